package bench;

import javax.crypto.Cipher;
import javax.crypto.SecretKey;

public class InsecureEncryption {

    public byte[] protect(SecretKey key, byte[] data) throws Exception {
        Cipher cipher = Cipher.getInstance("AES/ECB/PKCS5Padding");
        cipher.init(Cipher.ENCRYPT_MODE, key);
        return cipher.doFinal(data);
    }
}
