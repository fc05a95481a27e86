package bench;

import javax.crypto.Mac;
import javax.crypto.spec.SecretKeySpec;

public class InsecureMac {

    public byte[] authenticate(byte[] keyBytes, byte[] message) throws Exception {
        Mac mac = Mac.getInstance("HmacMD5");
        mac.init(new SecretKeySpec(keyBytes, "HmacMD5"));
        return mac.doFinal(message);
    }
}
